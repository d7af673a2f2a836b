"""
Utilities for reading and writing label files.

A label file holds one integer community label per line; line i belongs to node i
in internal-id order.
"""

import logging
from pathlib import Path

import numpy as np

from exceptions import LabelFileError
from models import Graph, Partition

logger = logging.getLogger(__name__)


def parse_labels(text):
    """Parse label-file content.

    Args:
        text (str): File content; trailing blank lines are ignored

    Returns:
        Partition: One label per non-blank line

    Raises:
        LabelFileError: A line is blank inside the file or not an integer
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    labels = []
    for line_number, line in enumerate(lines, 1):
        token = line.strip()
        if not token:
            raise LabelFileError(f"line {line_number}: blank line inside label file")
        try:
            labels.append(int(token))
        except ValueError:
            raise LabelFileError(f"line {line_number}: label '{token}' is not an integer") from None
    if not labels:
        raise LabelFileError("label file holds no labels")
    try:
        return Partition(np.asarray(labels, dtype=np.int64))
    except ValueError as e:
        raise LabelFileError(str(e)) from e


def read_labels(file_path, expected_n=None):
    """Read a label file, optionally checking it covers ``expected_n`` nodes."""
    path = Path(file_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise LabelFileError(f"Cannot read label file {path}: {e}") from e
    partition = parse_labels(text)
    if expected_n is not None and partition.n != expected_n:
        raise LabelFileError(f"{path} labels {partition.n} nodes, expected {expected_n}")
    logger.debug(f"Read {partition.n} labels from {path}")
    return partition


def format_labels(partition):
    return "".join(f"{label}\n" for label in partition.labels.tolist())


def write_labels(file_path, partition):
    Path(file_path).write_text(format_labels(partition), encoding="utf-8")
    logger.info(f"Labels written to {file_path}")


def write_remap_table(file_path, graph: Graph):
    """Write the original-label to internal-id table, one tab-separated pair per line."""
    lines = [f"{label}\t{index}\n" for index, label in enumerate(graph.labels)]
    Path(file_path).write_text("original_label\tinternal_id\n" + "".join(lines), encoding="utf-8")
    logger.info(f"Remap table written to {file_path}")
