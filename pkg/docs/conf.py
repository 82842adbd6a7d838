# Sphinx configuration of the MomentShape documentation.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

import sphinx_rtd_theme  # noqa: E402,F401

project = 'MomentShape'
copyright = '2022, Viktor Csomor'
author = 'Viktor Csomor'
release = '0.1.0'

# The MPI runtime is not available on the documentation builders.
autodoc_mock_imports = ['mpi4py']
autodoc_member_order = 'bysource'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx_rtd_theme'
]

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
master_doc = 'index'

html_theme = 'sphinx_rtd_theme'
html_static_path = []
