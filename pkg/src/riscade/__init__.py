"""Time-varying cascaded channel estimation for reflecting-surface links.

Pipeline: synthetic cascaded channels -> pilot observations and LS coarse
estimates -> ODE-evolved GRU time interpolation -> RK-structured antenna
extrapolation -> joint training and NMSE sweeps.
"""

from .autodiff import Tensor, backward, no_grad
from .channel import (ChannelSample, RayParams, ScenarioParams, draw_channel_sample,
                      draw_rays, make_H, make_cascade, make_g, steering_ula,
                      steering_upa, vectorize_cascade)
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, desk_profile, paper_profile, resolve_config
from .data import Dataset, generate_dataset, load_dataset, normalize, save_dataset
from .errors import (ContractError, DivergenceError, ScheduleError, ShapeError)
from .estimator import (EstimatorParams, GruCell, extrapolate, forward_sequence,
                        interpolate_sequence, loss, predict_full)
from .nn import Adam, DenseLayer, Sequential
from .ode import DynamicsNet, RKResidualBlock, ode_solve
from .pilot import (FrameSchedule, PilotObservation, build_network_input,
                    build_schedule, from_real_stack, ls_estimate, make_gamma,
                    observe, to_real_stack)
from .rng import substream
from .training import (RunRecord, SweepRun, TrainConfig, TrainingDiverged,
                       evaluate_nmse, split_indices, sweep, train)

__version__ = "0.1.0"
