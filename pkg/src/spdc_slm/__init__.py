"""Two-crystal type-I SPDC source: phase maps, coincidences and SLM compensation."""
from .biphoton import *  # noqa: F401,F403
from .coincidence import *  # noqa: F401,F403
from .config import ExperimentConfig, load_config  # noqa: F401
from .crystal import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .fileio import *  # noqa: F401,F403
from .phasematching import *  # noqa: F401,F403
from .slm import *  # noqa: F401,F403

__version__ = "0.1.0"
