"""Requirement-driven GUI test generation against simulated Android apps."""

from .bench import BenchConfig, compute_metrics, load_corpus, run_batch, run_case
from .device import DeviceSession, load_app
from .navigator import navigate
from .oracle import capture_pre_post, evaluate, generate_oracle
from .scoring import LexicalScorer, Lexicon
from .trigger import execute_script, generate_script, iterate_until_complete
from .ui_model import Action, Operation, Selector, UIElement, UIState

__version__ = "0.1.0"

__all__ = [
    "Action", "BenchConfig", "DeviceSession", "LexicalScorer", "Lexicon", "Operation", "Selector",
    "UIElement", "UIState", "capture_pre_post", "compute_metrics", "evaluate", "execute_script",
    "generate_oracle", "generate_script", "iterate_until_complete", "load_app", "load_corpus",
    "navigate", "run_batch", "run_case",
]
