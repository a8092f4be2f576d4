"""Frame emission: text grids, portable bitmaps, and color overlays.

All formats draw with y increasing upward, so the top output row is the
highest lattice row of the window.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from ubootstrap.dynamics import GridConfig


def text_frame(config: GridConfig) -> str:
    """'#' infected, '.' healthy, one text row per lattice row, top down."""
    rows = []
    for row in config.infected[::-1]:
        rows.append("".join("#" if v else "." for v in row))
    return "\n".join(rows) + "\n"


def pbm_p1(config: GridConfig) -> str:
    """Plain portable bitmap; 1 = infected (black)."""
    grid = config.infected[::-1]
    lines = [f"P1\n{config.width} {config.height}"]
    for row in grid:
        lines.append(" ".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"


def pbm_p4(config: GridConfig) -> bytes:
    """Binary portable bitmap; rows padded to whole bytes."""
    grid = config.infected[::-1]
    header = f"P4\n{config.width} {config.height}\n".encode("ascii")
    packed = np.packbits(grid.astype(np.uint8), axis=1)
    return header + packed.tobytes()


def ppm_overlay(config: GridConfig,
                layers: Optional[Dict[str, np.ndarray]] = None) -> bytes:
    """Binary portable pixmap of the window with optional colored layers.

    Base: healthy cells white, infected cells black.  ``layers`` maps a color
    name to a boolean mask of the window shape; later layers paint over
    earlier ones and over the base.
    """
    palette: Dict[str, Tuple[int, int, int]] = {
        "red": (220, 40, 40),
        "green": (40, 170, 60),
        "blue": (50, 90, 220),
        "yellow": (235, 200, 40),
        "cyan": (60, 200, 210),
        "magenta": (200, 60, 200),
        "grey": (160, 160, 160),
        "orange": (240, 140, 30),
    }
    h, w = config.infected.shape
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    img[config.infected] = (0, 0, 0)
    if layers:
        for name, mask in layers.items():
            if name not in palette:
                raise ValueError(f"unknown overlay color: {name}")
            img[np.asarray(mask, dtype=bool)] = palette[name]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    return header + img[::-1].tobytes()


def write_frame(path: str, config: GridConfig) -> None:
    """Write a frame picking the format from the file suffix.

    ``.txt`` gets the text grid, ``.pbm`` the plain bitmap (P1).
    """
    if path.endswith(".txt"):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text_frame(config))
    elif path.endswith(".pbm"):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(pbm_p1(config))
    else:
        raise ValueError(f"unsupported frame suffix (.txt or .pbm): {path}")
