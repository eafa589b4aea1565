__all__ = [
    "datagen",
    "distance",
    "formats",
    "oracle",
    "transformations",
]
