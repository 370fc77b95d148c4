"""channelforge: route, carve and validate liquid-metal sensing channels
inside watertight 3D-printable models."""

__version__ = "0.1.0"
