"""Time-harmonic elastic scattering by rigid obstacles in the plane."""
