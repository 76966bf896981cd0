"""attack-mapper: label unstructured CTI text with ATT&CK techniques."""

__version__ = "0.1.0"
