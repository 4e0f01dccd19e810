"""Bundled run configurations.

``los_reference``: stationary tag, clear sight lines, position-noise
mode at the default line-of-sight error statistics; long enough for
10000+ fixes.

``los_baseline``: the same statistics with the tag slowly circling the
arena instead of sitting still.

``nlos_wall``: a wall obstructs the three left-edge anchors from a
stationary tag, so every fix carries the obstructed error regime.
"""
