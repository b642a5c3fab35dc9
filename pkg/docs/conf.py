#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# surfseg documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
# Note that not all possible configuration values are present in this
# file. All configuration values have a default; values that are commented
# out serve to show the default.

from sphinx.highlighting import PygmentsBridge
from pygments.formatters.latex import LatexFormatter


class CustomLatexFormatter(LatexFormatter):
    def __init__(self, **options):
        super(CustomLatexFormatter, self).__init__(**options)
        self.verboptions = r"formatcom=\tiny"


PygmentsBridge.latex_formatter = CustomLatexFormatter


# -- General configuration ------------------------------------------------

extensions = ["sphinx.ext.githubpages", "sphinx.ext.mathjax"]

templates_path = ["_templates"]

source_suffix = ".rst"

# The master toctree document.
master_doc = "index"

# General information about the project.
project = "surfseg"
copyright = "The surfseg authors"
author = "The surfseg authors"

# The short X.Y version.
version = "1.0"
# The full version, including alpha/beta/rc tags.
release = "1.0.0"

language = None

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store", ".venv"]

pygments_style = "sphinx"

todo_include_todos = False


# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"

htmlhelp_basename = "surfsegdoc"


# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (
        master_doc,
        "surfseg.tex",
        "surfseg Documentation",
        author,
        "manual",
    ),
]

latex_elements = {
    "pointsize": "12pt",
    "extraclassoptions": "oneside",
}

latex_show_urls = "footnote"


# -- Options for manual page output ---------------------------------------

# One entry per manual page: (source start file, name, description, authors,
# manual section).
man_pages = [(master_doc, "surfseg", "surfseg Documentation", [author], 1)]

for command in (
    "synth",
    "pretrain",
    "finetune",
    "infer",
    "eval",
    "fit-gauss",
    "smooth",
):
    man_pages.append(
        (
            "ref/surfseg_%s" % command.replace("-", "_"),
            "surfseg %s" % command,
            "surfseg %s" % command,
            [author],
            1,
        )
    )
