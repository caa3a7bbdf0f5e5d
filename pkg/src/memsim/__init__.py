"""Behavioral simulator of a dopamine-modulated memristive neuron board."""
from .blocks import ModMode, ModStageConfig
from .engine import SimConfig, SimResult, run, topo_order
from .errors import ConfigurationError, MemsimError, ProtocolError, StructuralError
from .memristor import MemristorState, memristor_drive, memristor_step
from .neuron import Mode, NeuronNetlist, OneShotSense, SomaConfig, build_standard_netlist
from .signals import ComponentValues, DeltaT, SpikeTrain, TimeGrid, Trace, Unit

__version__ = "0.1.0"
