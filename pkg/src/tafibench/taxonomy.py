"""The three-class texture taxonomy used for routing and reporting."""
from __future__ import annotations

import enum


class TextureClass(enum.Enum):
    """Homogeneous video texture classes.

    STATIC: rigid texture, only a global camera-style motion.
    DYNDIS: discernible parts moving independently of each other.
    DYNCON: irregular texture moving as a continuum (water, smoke, ...).
    """

    STATIC = "static"
    DYNDIS = "dyndis"
    DYNCON = "dyncon"

    def __str__(self) -> str:
        return self.value


#: Canonical ordering used by reports and profile files.
ALL_CLASSES = (TextureClass.STATIC, TextureClass.DYNDIS, TextureClass.DYNCON)


def parse_texture_class(name: str) -> TextureClass:
    try:
        return TextureClass(name.strip().lower())
    except ValueError:
        raise ValueError(f"unknown texture class {name!r}; expected one of "
                         f"{[c.value for c in ALL_CLASSES]}") from None
