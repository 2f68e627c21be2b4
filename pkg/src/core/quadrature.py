"""
求积节点：复合 Gauss–Legendre 面板与周期梯形公式
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import special

from ..models.transform_models import QuadratureSpec
from .hypergeom import hyperboloid_points, invariant_density

# 面板阶数候选，取第一个整除节点数者
PANEL_ORDERS = (16, 20, 24, 12, 10, 8, 6, 4, 2)


def panel_order(n: int) -> int:
    """选择整除 n 的面板阶数"""
    return next(order for order in PANEL_ORDERS if n % order == 0)


@lru_cache(maxsize=None)
def _legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    return nodes, weights


def composite_gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """[a, b] 上 n 个节点的复合 Gauss–Legendre 公式"""
    if n % 2:
        raise ValueError(f"节点数必须为偶数: {n}")
    order = panel_order(n)
    panels = n // order
    nodes, weights = _legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return t, w


def periodic_trapezoid(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """[0, 2π) 上的周期梯形公式"""
    theta = 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)


@dataclass(frozen=True, eq=False)
class XGrid:
    """X 上的张量积网格（已含密度 cosh t）"""
    points: np.ndarray       # (N, 3)
    weights: np.ndarray      # (N,)
    t: np.ndarray            # (N,)
    theta: np.ndarray        # (N,)
    n_t: int
    n_theta: int


@lru_cache(maxsize=8)
def x_grid(spec: QuadratureSpec) -> XGrid:
    """按求积参数构造（并缓存）X 上的网格"""
    t, w_t = composite_gauss_legendre(-spec.t_max, spec.t_max, spec.n_t)
    theta, w_theta = periodic_trapezoid(spec.n_theta)
    tt, th = np.meshgrid(t, theta, indexing="ij")
    weights = (w_t * invariant_density(t))[:, None] * w_theta[None, :]
    points = hyperboloid_points(tt, th).reshape(-1, 3)
    for array in (points, weights):
        array.flags.writeable = False
    return XGrid(points, weights.ravel(), tt.ravel(), th.ravel(), spec.n_t, spec.n_theta)


def uniform_grid(t_max: float, n_t: int, n_theta: int) -> np.ndarray:
    """均匀网格上的点（无权重），用于逐点不等式检查"""
    t = np.linspace(-t_max, t_max, n_t)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    tt, th = np.meshgrid(t, theta, indexing="ij")
    return hyperboloid_points(tt, th).reshape(-1, 3)


@lru_cache(maxsize=8)
def fiber_nodes(spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """纤维积分的节点与权重"""
    t, w = composite_gauss_legendre(-spec.fiber_t_max, spec.fiber_t_max, spec.fiber_n)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w
