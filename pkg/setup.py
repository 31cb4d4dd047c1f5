from setuptools import setup, find_packages
from codecs import open
from os import path

__version__ = '0.1.0'

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

# get the dependencies and installs
with open(path.join(here, 'requirements.txt'), encoding='utf-8') as f:
    all_reqs = f.read().split('\n')

install_requires = [x.strip() for x in all_reqs if x.strip() and not x.startswith('#') and 'git+' not in x]
dependency_links = [x.strip().replace('git+', '') for x in all_reqs if x.startswith('git+')]

setup(
    name='boltzspec',
    version=__version__,
    description='Spectral analysis of the linearized hard-sphere Boltzmann operator and its Fourier-space counterpart',
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='MIT',
    classifiers=[
      'Development Status :: 3 - Alpha',
      'Intended Audience :: Science/Research',
      'Programming Language :: Python :: 3',
    ],
    keywords='boltzmann kinetic-theory spectral-analysis hydrodynamic-limit',
    packages=find_packages(exclude=['docs', 'tests*']),
    include_package_data=True,
    author='boltzspec developers',
    install_requires=install_requires,
    dependency_links=dependency_links,
    entry_points={'console_scripts': ['boltzspec=boltzspec.cli:main']},
    test_suite='tests'
)
