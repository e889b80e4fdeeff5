from src.main import MODES, solve_instance

__all__ = ['MODES', 'solve_instance']
