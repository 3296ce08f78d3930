# -*- coding: utf-8 -*-
#
# cliffwarm documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing
# dir. Only the values that differ from the sphinx defaults are set here.

import sys, os

# If extensions (or modules to document with autodoc) are in another
# directory, add these directories to sys.path here.
sys.path.insert(0, os.path.abspath('../src'))
import cliffwarm

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.intersphinx',
              'sphinx.ext.mathjax']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'cliffwarm'
copyright = u'2026, the cliffwarm developers'

# The short X.Y version, and the full version including alpha/beta/rc tags.
version = cliffwarm.__version__
release = version

exclude_trees = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'cliffwarmdoc'

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [
  ('index', 'cliffwarm.tex', u'cliffwarm Documentation',
   u'the cliffwarm developers', 'manual'),
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'torch': ('https://pytorch.org/docs/stable/', None),
}
