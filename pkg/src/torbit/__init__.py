"""torbit: a computational laboratory for periodic diagonal-torus orbits on
spaces of lattices (degrees 2 and 3), with the finite x2 x3 analogue.

Exact arithmetic backs every identity: field/order/ideal computations run
over integers and rationals, real embeddings carry certified interval error,
and floating point only enters at reporting boundaries.
"""

__version__ = "0.1.0"

from .fields import (TotallyRealField, Order, UnitGroup,
                     enumerate_totally_real_fields, simplest_cubic,
                     quadratic_field_of_disc, minkowski_embedding,
                     order_discriminant, unit_group)
from .ideals import (FractionalIdeal, IdealClass, MinkowskiStat,
                     enumerate_integral_ideals, class_equal,
                     class_representatives, minimal_class_norm,
                     field_minkowski_stat, quadratic_proper_classes,
                     minkowski_bound)
from .orbits import (TorusOrbit, LieTorusData, orbit_from_triple,
                     discriminant_order_route, discriminant_wedge_route,
                     cusp_excursion, in_omega_prime, omega_R_membership,
                     omega_R_threshold, orbit_volume, sample_orbit,
                     escaped_mass_fraction, haar_entropy, lie_torus_data,
                     orbit_key, multiplier_order)
from .dynamics import (EmbeddedLattice, FlowDirection, reduce,
                       group_distance, min_orbit_separation,
                       pairwise_separations, tube_mass)
from .modular2 import (QuadSurd, CFExpansion, QuadraticOrderGeodesic,
                       cf_expand, fundamental_unit_cf, volume_bound_check,
                       volume_bound_sweep, badly_approximable,
                       forward_orbit_stays, anosov_close, abundance_scan,
                       quadratic_order_class_data, liminf_m_dist)
from .times23 import (MultOrbitSet, EmpiricalMeasure, orbit_closure_23,
                      partition_entropy, entropy_lower_bound_check,
                      discrepancy, exp_sum_profile, max_dyadic_discrepancy,
                      uniform_measure, n_separating)
