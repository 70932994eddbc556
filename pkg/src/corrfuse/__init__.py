"""Correntropy-based quaternion attitude estimation for IMUs."""

from .correntropy import (InducedPdf, KernelBandwidths, MixtureNoiseModel, gaussian_kernel, induced_pdf_build,
                          likelihood_sweep, loglik_compare, ls_loss, mkcl_influence, mkcl_loss, sample_mixture)
from .doe import DoeConfig, DoeState, cdoe_step, doe_step, run_cdoe, run_doe
from .errors import CorrfuseError
from .fileio import FilterConfig, load_config, parse_config, read_imu_csv, read_quat_csv, write_imu_csv, write_quat_csv
from .gd import GdConfig, GdState, cgd_step, error_jacobian, gd_step, measurement_error, run_cgd, run_gd
from .metrics import ErrorReport, euler_errors, evaluate, format_table
from .quaternion import (EulerAngles, euler_to_quat, matrix_to_quat, quat_conjugate, quat_multiply, quat_to_euler,
                         quat_to_matrix)
from .sensors import EarthField, ImuSample, ImuStream, ecompass_init, normalize_measurements
from .simulator import DisturbanceSpec, TrajectorySpec, generate, preset_experiments
from .tuning import collect_residuals, suggest_bandwidths

__version__ = "0.1.0"
