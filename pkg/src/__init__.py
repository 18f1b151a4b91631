"""
Radar Odometry - Odometría 2D por radar giratorio con puntos de superficie orientados
"""

__version__ = "1.0.0"
