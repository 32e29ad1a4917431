"""Generate Vossian Antonomasias ("A is the B of C") from Wikidata and embeddings."""

__version__ = "0.1.0"
