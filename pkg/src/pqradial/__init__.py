"""pqradial: a phase-plane laboratory for the radial equation
-u'' - (N-1)/r u' + u^p - M|u'|^q = 0."""

from .params import (CriticalMasses, ExponentSet, ProblemParams, compute_exponents,
                     critical_masses, scale_invariant_q)
from .errors import NumericalError, RegimeError
from .equilibria import (ConstantSolutionSet, EquilibriumReport, bifurcation_check,
                         eikonal_constant, emden_constant, eval_pm,
                         find_constant_solutions, fixed_points, linearize_order3,
                         linearize_planar, riccati_constants)
from .laws import AsymptoticLaw, laws_near_infinity, laws_near_zero
from .regime import RegimeReport, classify_regime
from .integrator import Event, EventSpec, Trajectory, integrate
from .charts import (Chart, CHARTS, apriori_check, chart_rhs, chart_transfer,
                     diagnostics, integrate_chart, profile_from_state,
                     sample_chart_trajectory, state_from_profile,
                     trajectory_profile)
from .orbits import (CentralManifoldProfile, RadialProfile, ShootResult,
                     central_manifold_profile, eigen_rate_check, manifold_seed,
                     regular_solution, shoot_connection)
from .profiles import (BarrierCertificate, Profile, ResidualReport, barrier,
                       critical_explicit, eikonal_harmonic, exterior_newton_profile,
                       newton_matching_C, residual_oracle, riccati_profile,
                       selfsimilar)
from .asymptotics import (Classification, ExpansionCheck, FitResult, HardyResult,
                          classify_behavior, fit_law, hardy_limit, verify_expansion)
from .portrait import (FieldGrid, RegionMap, field_grid, ray_curve_intersections,
                       region_label, vanishing_curves)

__version__ = "0.1.0"
