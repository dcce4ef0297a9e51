import sys
from pathlib import Path

sys.path.insert(0, str(Path("../../src").absolute()))

project = "chkpi"

extensions = [
    "myst_parser",
    "sphinx.ext.autodoc",
]

source_suffix = [".md"]
autodoc_class_signature = 'separated'

html_theme = "furo"
