#!/usr/bin/env python

import glob
import os
from os import path
from setuptools import setup, Extension
import runpy
import sys

# allow to build with cython, but disable by default.
# build by doing CYTHON_ENABLED=1 python setup.py build_ext --inplace
CYTHON_ENABLED = True if os.getenv('CYTHON_ENABLED', False) else False

MYDIR = path.abspath(os.path.dirname(__file__))
long_description = open(os.path.join(MYDIR, 'README.rst')).read()

version = runpy.run_path(
    path.join(MYDIR, 'gibbsbd', 'version.py'))['__version__']

JYTHON = 'java' in sys.platform

try:
    sys.pypy_version_info
    PYPY = True
except AttributeError:
    PYPY = False

if PYPY or JYTHON:
    CYTHON = False
else:
    try:
        from Cython.Distutils import build_ext
        CYTHON = True
    except ImportError:
        print('\nNOTE: Cython not installed. '
              'gibbsbd will still work fine, but may run '
              'a bit slower.\n')
        CYTHON = False

if CYTHON and CYTHON_ENABLED:
    def list_modules(dirname):
        filenames = glob.glob(path.join(dirname, '*.py'))

        module_names = []
        for name in filenames:
            module, ext = path.splitext(path.basename(name))
            if module not in ('__init__', 'cli'):
                module_names.append(module)

        return module_names

    ext_modules = [
        Extension('gibbsbd.' + ext, [path.join('gibbsbd', ext + '.py')])
        for ext in list_modules(path.join(MYDIR, 'gibbsbd'))]

    cmdclass = {'build_ext': build_ext}

else:
    cmdclass = {}
    ext_modules = []


setup(
    name='gibbsbd',
    version=version,
    description='Spatial birth-death dynamics of Gibbs point processes',
    packages=['gibbsbd'],
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.11',
        'six',
        'future',
        'tomli; python_version < "3.11"',
    ],
    extras_require={
        'fast': ['ujson', 'Cython>=0.29'],
    },
    tests_require=[
        'mock',
        'tox',
        'testfixtures',
        'coverage',
        'line_profiler',
    ],
    entry_points={
        'console_scripts': ['gibbsbd = gibbsbd.cli:main'],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    license='',
    include_package_data=True,
    long_description=long_description,
    cmdclass=cmdclass,
    ext_modules=ext_modules
)
