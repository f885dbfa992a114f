"""talentmap: a scholarly knowledge graph rendered as an interactive 2D
semantic space, with similarity recommendations and grounded justifications."""

__version__ = "0.1.0"
