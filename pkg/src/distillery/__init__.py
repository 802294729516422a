"""Corpus distillation workbench: grow a small expert-picked core of papers
into a large, topically coherent corpus by iterating citation-network hops
with human-in-the-loop, hypersphere, and topic-model pruning."""

__version__ = "0.1.0"
