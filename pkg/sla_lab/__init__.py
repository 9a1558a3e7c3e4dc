"""Self-supervised label augmentation: joint (class, transformation) labels."""

__version__ = "0.1.0"
