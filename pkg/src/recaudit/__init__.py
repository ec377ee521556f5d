"""Desk-scale auditing toolkit for video-recommendation platforms.

Subpackages and modules:

* ``corpus``     - canonical data model (videos, labels, edges, splits) and JSONL persistence
* ``annotation`` - crowd-annotation quality control and label resolution
* ``features``   - text preprocessing, embeddings, and model-ready feature bundles
* ``netlab``     - multi-branch neural classifier with from-scratch backpropagation
* ``platform``   - platform client abstraction: HTTP client, throttling, response cache
* ``simulator``  - deterministic synthetic platform with planted ground truth
* ``crawler``    - keyword seed harvesting and breadth-first recommendation crawl
* ``graphlab``   - recommendation-graph analytics (prevalence, transitions, degrees)
* ``stats``      - chi-square, relative risk, Benjamini-Hochberg FDR, post-hoc drivers
* ``audit``      - personalized sock-puppet audit protocol and effects analysis
* ``cli``        - command-line entry point wiring all of the above
"""

__version__ = "0.1.0"

from recaudit.errors import RecauditError

__all__ = ["RecauditError", "__version__"]
