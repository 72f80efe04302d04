# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Sphinx configuration for the socgcf API pages.
"""

import os
import sys

sys.path.insert(0, os.path.abspath('../'))

from socgcf import __version__  # noqa: E402

project = 'socgcf'
copyright = '2021, socgcf developers'
author = 'socgcf developers'
version = release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinxcontrib.fulltoc',
]
autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build', 'generated']
pygments_style = 'sphinx'

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'socgcfdoc'

latex_documents = [
    (master_doc, 'socgcf.tex', 'socgcf Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'socgcf', 'socgcf Documentation', [author], 1),
]


def include_init(app, what, name, obj, skip, options):
    if name == '__init__':
        return False
    return skip


def setup(app):
    app.connect('autodoc-skip-member', include_init)
