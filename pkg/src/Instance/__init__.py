from src.Instance.main import (
    Agent,
    Instance,
    Allocation,
    allocation_from_dict,
    instance_from_dict,
    load_instance,
    save_instance,
    gen_random
)
from src.Instance.gap import GapInstanceSpec, build_gap_instance, gen_gap_instance

__all__ = [
    'Agent',
    'Instance',
    'Allocation',
    'allocation_from_dict',
    'instance_from_dict',
    'load_instance',
    'save_instance',
    'gen_random',
    'GapInstanceSpec',
    'build_gap_instance',
    'gen_gap_instance'
]
