# Sphinx configuration for the universal_sets documentation.
import os
import sys

# autodoc imports the package from the repository root
sys.path.insert(0, os.path.abspath('../..'))

project = 'universal_sets'
copyright = '2026, universal_sets developers'
author = 'universal_sets developers'

extensions = ['sphinx_rtd_theme', 'sphinx.ext.autodoc',
              'sphinxcontrib.napoleon', 'sphinx_autodoc_typehints']

# Return types come from the annotations via sphinx_autodoc_typehints
napoleon_use_rtype = False
autodoc_member_order = 'bysource'

templates_path = ['_templates']
exclude_patterns = []

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
