"""weaklabel: build labeled datasets from rules instead of hand annotation.

The pipeline: ingest raw articles into fixed-size chunks, author labeling
rules in a small closed language, run them into a vote matrix, inspect
coverage/overlap/conflict statistics, aggregate votes with a majority voter
or a generative label model, review a slice by hand, and export soft- or
hard-labeled datasets.
"""

__version__ = "0.1.0"
