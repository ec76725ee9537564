"""Energy, average-energy and recharge games on weighted two-player arenas."""
from .arena import (R, ArenaError, FiniteStateStrategy, MemoryStructure, Player, WeightedArena,
                    load_fixture, parse_arena, serialize_arena)
from .evaluation import Lasso, ObjectiveValue, avg_energy_of_lasso, mean_payoff_of_lasso
from .objectives import (AvgEnergyL, AvgEnergyLU, AvgRecharge, Countdown, EnergyL, EnergyLU,
                         MeanPayoff, Parity, Recharge)

__version__ = "0.1.0"
