"""CPU benchmark harness for lightweight mammographic lesion segmentation."""

__version__ = "0.1.0"
