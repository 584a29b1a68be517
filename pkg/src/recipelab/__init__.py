"""recipelab: desk-scale recipe text generation and evaluation studio."""

__version__ = "0.1.0"

from importlib import resources


def bundled_corpus_path():
    """Path to the bundled sample corpus (jsonl, one recipe per line)."""
    return resources.files("recipelab.data").joinpath("sample_recipes.jsonl")
