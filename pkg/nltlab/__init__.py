VERSION = "0.1.0"

# Make the front classes available as from nltlab import Experiment
from .config import ExperimentConfig
from .experiment import Experiment, ExitCode
from .models import ModelFamily, ModelSpec
from .spectral import Grid, SpectralField
