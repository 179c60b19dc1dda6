import importlib.metadata as ilmd
import os
import sys

# Make capteamcli importable for autodoc/sphinx-click
sys.path.insert(0, os.path.abspath(".."))

project = "capteam-cli"
root_doc = "index"

try:
    pkg_version = ilmd.version("capteam-cli")
except ilmd.PackageNotFoundError:
    pkg_version = "0.0.0"

release = pkg_version
version = pkg_version

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx_click",
]

autodoc_typehints = "description"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "networkx": ("https://networkx.org/documentation/stable/", None),
}

html_theme = "sphinx_rtd_theme"
html_title = "capteam-cli Documentation"
html_short_title = project
html_theme_options = {
    "collapse_navigation": False,
    "navigation_depth": 4,
}
