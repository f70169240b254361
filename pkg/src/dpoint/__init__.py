"""Q-learning path planning in a moving-obstacle arena with D-point state encoding."""

__version__ = "0.1.0"
