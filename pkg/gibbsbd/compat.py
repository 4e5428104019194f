# try to use ujson
try:
    import ujson as json  # noqa
except ImportError:
    import json  # noqa

# tomllib landed in 3.11; older interpreters read the same files via tomli
try:
    import tomllib  # noqa
except ImportError:
    import tomli as tomllib  # noqa
