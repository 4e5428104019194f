"""
gibbsbd - spatial birth-death dynamics of Gibbs point processes

"""
from .exceptions import *  # noqa
from .space import *  # noqa
from .potential import *  # noqa
from .configuration import *  # noqa
from .gibbs import *  # noqa
from .dynamics import *  # noqa
from .coupling import *  # noqa
from .percolation import *  # noqa
from .oracle import *  # noqa
from .stats import *  # noqa
from .runner import *  # noqa
from .fields import *  # noqa
from .definition import *  # noqa
from .experiment import *  # noqa
from .experiments import *  # noqa
from .reporting import *  # noqa
from .version import __version__  # noqa
