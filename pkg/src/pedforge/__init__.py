"""pedforge: a workbench that turns pedagogical intent into game designs
through a shared four-slot controlled sentence, with every decision
versioned and traceable."""

__version__ = "0.1.0"
