from ._core import *  # noqa: F401,F403
from ._core import ChainingError, InputError

__version__ = "0.1.0"
