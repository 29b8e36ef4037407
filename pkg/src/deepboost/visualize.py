"""SVG export of a layer's selected features as oriented ellipses.

Every primitive Gabor feature reachable from a layer's selected set is
drawn once: center at its lattice position, major axis along the edge
direction its orientation index responds to, and opacity proportional to
its accumulated weight. The weight of a primitive is the sum over all
composition paths from the layer's selected features down to it of the
product of the combination weights along the path; at layer 1 every
selected primitive has weight 1.
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

from .compose import PrimitiveFeature, PrimitiveLattice
from .errors import LayerOutOfRangeError
from .gabor import GaborIndex
from .model import DeepBoostModel

_CANVAS = 120
_DISPLAY_SCALE = 4


def accumulate_primitive_weights(model: DeepBoostModel, layer: int) -> dict[GaborIndex, float]:
    """Map each reachable primitive to its path-product weight sum."""
    if not 1 <= layer <= model.layer_count:
        raise LayerOutOfRangeError(f"layer {layer} outside 1..{model.layer_count}")
    weights: dict[int, float] = {}
    for stump in model.layers[layer - 1].classifier.stumps:
        weights.setdefault(stump.d, 1.0)

    for level in range(layer, 1, -1):
        lower: dict[int, float] = {}
        candidates = model.layers[level - 1].candidates
        for d, wt in weights.items():
            prov = candidates[d].provenance
            lower[prov.s] = lower.get(prov.s, 0.0) + wt * prov.beta_s
            lower[prov.t] = lower.get(prov.t, 0.0) + wt * prov.beta_t
        weights = lower

    lattice = model.layers[0].candidates
    out: dict[GaborIndex, float] = {}
    for d, wt in weights.items():
        prov = lattice[d].provenance
        assert isinstance(prov, PrimitiveFeature)
        out[prov.gabor] = out.get(prov.gabor, 0.0) + wt
    return out


def render_layer_svg(model: DeepBoostModel, layer: int) -> str:
    """Well-formed SVG document with one ellipse per reachable primitive."""
    weights = accumulate_primitive_weights(model, layer)
    wmax = max(weights.values()) if weights else 1.0
    a = model.config.orientations
    size = _CANVAS * _DISPLAY_SCALE
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {_CANVAS} {_CANVAS}">',
        f'<desc>{_desc(model, layer)}</desc>',
        f'<rect width="{_CANVAS}" height="{_CANVAS}" fill="white"/>',
    ]
    for g in sorted(weights, key=lambda g: (g.h, g.w, g.alpha)):
        opacity = weights[g] / wmax
        # ellipse lies along the edge direction: carrier angle + 90 degrees
        angle = g.alpha * 180.0 / a + 90.0
        lines.append(
            f'<ellipse cx="{g.w}" cy="{g.h}" rx="5" ry="1.6" fill="black" '
            f'fill-opacity="{opacity:.6g}" '
            f'transform="rotate({angle:.4g} {g.w} {g.h})"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines)


def _desc(model: DeepBoostModel, layer: int) -> str:
    txt = f"class {model.positive_class}, layer {layer} of {model.layer_count}"
    return quoteattr(txt)[1:-1]
