"""Exception hierarchy shared by every memsim module."""


class MemsimError(Exception):
    """Base class for all errors raised by memsim."""


class ConfigurationError(MemsimError, ValueError):
    """A parameter or configuration value violates its constraints."""


class StructuralError(MemsimError):
    """A netlist cannot be validated or scheduled."""


class ProtocolError(MemsimError):
    """An experiment protocol cannot be realised on the requested grid."""
