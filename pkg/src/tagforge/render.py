"""Matplotlib figure rendering for trees and families.

matplotlib is imported lazily so the rest of the package works without a
drawing backend; figures always use Agg and deterministic layout.
"""

import math
from typing import Dict, List, Sequence, Tuple

from .trees import ANCHOR, FOOT, NA, SUBST, ElementaryTree, TreeNode

_MARK_TEXT = {SUBST: "↓", FOOT: "*", ANCHOR: "◇"}


def node_caption(node: TreeNode) -> str:
    if node.terminal:
        return node.label.stem
    text = "ε" if node.is_empty else node.label.text()
    for mark in (FOOT, SUBST, ANCHOR):
        if mark in node.markers:
            text += _MARK_TEXT[mark]
    if NA in node.markers:
        text += "ₙₐ"
    return text


def _layout(root: TreeNode) -> Dict[Tuple[int, ...], Tuple[float, float]]:
    """Leaves at consecutive x positions, parents centered, depth as -y."""
    pos: Dict[Tuple[int, ...], Tuple[float, float]] = {}
    next_x = [0.0]

    def place(node, addr, depth):
        if not node.children:
            x = next_x[0]
            next_x[0] += 1.0
        else:
            xs = [place(c, addr + (i,), depth + 1)
                  for i, c in enumerate(node.children, 1)]
            x = sum(xs) / len(xs)
        pos[addr] = (x, -float(depth))
        return x

    place(root, (), 0)
    return pos


def draw_tree(ax, tree: ElementaryTree, title: str = ""):
    pos = _layout(tree.root)

    def edges(node, addr):
        x0, y0 = pos[addr]
        for i, child in enumerate(node.children, 1):
            x1, y1 = pos[addr + (i,)]
            ax.plot([x0, x1], [y0 - 0.08, y1 + 0.12], color="0.4", lw=0.9,
                    zorder=1)
            edges(child, addr + (i,))

    edges(tree.root, ())

    def labels(node, addr):
        x, y = pos[addr]
        style = "italic" if node.terminal else "normal"
        ax.text(x, y, node_caption(node), ha="center", va="center",
                fontsize=9, fontstyle=style, zorder=2,
                bbox=dict(boxstyle="round,pad=0.15", fc="white", ec="none"))
        for i, child in enumerate(node.children, 1):
            labels(child, addr + (i,))

    labels(tree.root, ())
    ax.set_title(title or tree.name, fontsize=10)
    ax.set_axis_off()
    ax.margins(0.15)


def save_tree_figure(tree: ElementaryTree, path: str, dpi: int = 120):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(3.2, 2.6))
    draw_tree(ax, tree)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_family_figure(name: str, trees: Sequence[ElementaryTree], path: str,
                       dpi: int = 120, cols: int = 4):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    count = max(1, len(trees))
    cols = min(cols, count)
    rows = math.ceil(count / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.0 * cols, 2.6 * rows),
                             squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat:
        ax.set_axis_off()
    for ax, tree in zip(flat, trees):
        draw_tree(ax, tree)
    fig.suptitle(name, fontsize=12)
    fig.tight_layout(rect=(0, 0, 1, 0.96))
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
