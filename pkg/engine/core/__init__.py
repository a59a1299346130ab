"""
Core computations: spaces, maps, Hausdorff distances, deterministic and
random iteration, verification, superfractals and rendering.
"""
