"""Game-theoretic toolkit for cluster-abstracted social-deduction games.

Subpackages cover the Werewolf rules engine with discrete discussion
strategies, a proof-of-concept Rock-Paper-Scissors-Spock-Lizard game,
tabular CFR with exact exploitability measurement, exact Bayesian role
beliefs, a preference-pair export pipeline, a self-play evaluation
harness, and a session server for human-vs-agent play.
"""

__version__ = "0.1.0"

from .cfr import AveragePolicy, Checkpoint, SolverConfig, Tables, regret_matching, solve
from .efg import Game, NodeKind
from .exploit import TreeIndex, best_response, exploitability_profile
from .werewolf import GameConfig, WerewolfGame, four_player_config

__all__ = [
    "AveragePolicy", "Checkpoint", "SolverConfig", "Tables", "regret_matching",
    "solve", "Game", "NodeKind", "TreeIndex", "best_response",
    "exploitability_profile", "GameConfig", "WerewolfGame", "four_player_config",
]
