# -*- coding: utf-8 -*-
#
# boltzspec documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.abspath('..'))
import boltzspec

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]

# Heavy numerical imports are not needed to render the API pages
autodoc_mock_imports = ['numba', 'dask', 'h5py', 'lmfit', 'xarray', 'psutil', 'threadpoolctl']
autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'boltzspec'
copyright = u'2026, boltzspec developers'
version = '.'.join(boltzspec.__version__.split('.')[:2])
release = boltzspec.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'boltzspecdoc'

latex_documents = [
  ('index', 'boltzspec.tex', u'boltzspec Documentation', u'boltzspec developers', 'manual'),
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy', None)}
