"""Presheaves, sheaves and Čech cohomology on finite topological spaces, with
a categorical model of EPR entanglement and measurement built on top."""

__version__ = "0.1.0"

from .algebra import (FGAbelianGroup, IntMatrix, SNFResult, hermite_normal_form, kernel_basis,
                      quotient_group, smith_normal_form, solve)
from .cech import (CechComplex, CohomologyResult, build_cech_complex, build_chain_complex,
                   cohomology, cohomology_of_space)
from .presheaf import (Presheaf, Section, check_compatibility, constant_presheaf, glue, is_sheaf,
                       restrict, sheafify, stalk, validate_presheaf)
from .topology import (Cover, FiniteTopology, OpenSet, check_cover, hom_set, minimal_open,
                       minimal_open_cover, validate_topology)
