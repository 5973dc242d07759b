"""qwalklab: exact constants, sector-walk simulation, and mixing measurement
for the q-weighted random walks attached to high-dimensional expanders."""

__version__ = "0.1.0"
