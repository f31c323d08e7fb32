# Configuration file for the Sphinx documentation builder.
# Package pages include their README.md through m2r2's ``mdinclude``.
import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

from emergelib import __version__

project = 'emergelib'
author = 'emergelib contributors'
copyright = '2026, emergelib contributors'
release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',  # Google docstrings
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
    'm2r2',
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/pandas-docs/stable/', None),
    'sklearn': ('https://scikit-learn.org/stable/', None),
    'matplotlib': ('https://matplotlib.org/stable/', None),
}

autoclass_content = 'both'
source_suffix = {
    '.rst': 'restructuredtext',
    '.md': 'markdown',
}
exclude_patterns = ['emergelib.tests*']
master_doc = 'index'  # readthedocs needs it explicitly

html_theme = 'sphinx_rtd_theme' if os.environ.get('READTHEDOCS') == 'True' else 'classic'
