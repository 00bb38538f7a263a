"""vranphy: slot-batched NR LDPC coding, accelerator-abstraction emulation
and a multi-instance High-PHY deployment harness."""

__version__ = "0.1.0"
