"""Train and evaluate activity classifiers over exported sentence datasets.

This package never touches raw sensor logs. Its whole world is the export
handshake: dataset JSONL plus manifest in, metrics JSON out.
"""

__version__ = "0.1.0"
