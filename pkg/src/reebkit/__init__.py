"""Besse contact forms: exact Seifert invariants, action spectra and numerical Reeb dynamics."""

from .errors import *  # noqa: F401,F403
from .seifert import (Rational, SeifertInvariants, SosData, DualPair, besse_volume, connectivity_certificate,
                      dual_pair, euler_number, k0_index, parse_pairs, sos_data, validate_invariants)
from .spectra import (INFINITE, BesseModel, PeriodMultiset, diophantine_maximizers, ellipsoid_model,
                      ellipsoid_pairs, period_multiset, rho_k, spectrum_table, spindle_model,
                      spindle_multiplicity, tau_k)
from .charts import (BumpSpec, ConformalChart, EllipsoidChart, PolynomialFactor, SeifertTorusChart,
                     StandardDiskChart, bump_chart, perturb_conformal)
from .reeb import (OrbitRecord, contact_volume, exactness_defect, find_periodic_orbit, first_return_data,
                   integrate, reeb_field, return_time_volume)
from .surfaces import (AnnulusSurface, DiskSurface, Hamiltonian, HamiltonianSystem, action_of_point, calabi,
                       flow_map, min_action_fixed_point, verify_fixed_point_inequality)
from .harness import (ExperimentConfig, ExperimentReport, emit_report, load_config, parse_report,
                      run_experiment)

__version__ = "0.1.0"
