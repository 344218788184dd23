"""Per-camera affine color harmonization and the image metrics behind it.

A color map is ``c' = W c + T`` (3x3 matrix plus offset) applied per pixel
and clamped to [0, 1].  Fitting minimizes the blended objective
``(1 - lambda1) * L1 + lambda1 * (1 - SSIM) / 2`` between a target view and
the mapped source view: a closed-form least-squares solve lands in the right
basin, then gradient descent with backtracking refines against the full loss.

SSIM uses the standard 11x11 Gaussian window (sigma 1.5, K1=0.01, K2=0.03,
dynamic range 1.0), evaluated per channel over positions where the window
fully fits, then averaged.
"""

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
_C1 = (SSIM_K1 * 1.0) ** 2
_C2 = (SSIM_K2 * 1.0) ** 2
_RADIUS = SSIM_WINDOW // 2


@dataclass(frozen=True)
class AffineColorMap:
    """3x3 channel-mixing matrix plus RGB offset."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        offset = np.asarray(self.offset, dtype=np.float64)
        if matrix.shape != (3, 3) or offset.shape != (3,):
            raise ValueError(f"expected (3,3) matrix and (3,) offset, got "
                             f"{matrix.shape} and {offset.shape}")
        if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(offset))):
            raise ValueError("color map entries must be finite")
        matrix.flags.writeable = False
        offset.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def identity(cls) -> "AffineColorMap":
        return cls(np.eye(3), np.zeros(3))

    def compose(self, inner: "AffineColorMap") -> "AffineColorMap":
        """Map equivalent to applying ``inner`` first, then this map."""
        return AffineColorMap(self.matrix @ inner.matrix,
                              self.matrix @ inner.offset + self.offset)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.matrix.ravel(), self.offset])


@dataclass(frozen=True)
class Image:
    """RGB image, float values in [0, 1], shape (H, W, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixels, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("image contains non-finite values")
        if px.min() < -1e-9 or px.max() > 1.0 + 1e-9:
            raise ValueError("image values must lie in [0, 1]")
        px = np.clip(px, 0.0, 1.0)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _check_pair(a: Image, b: Image):
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image dimensions differ: {a.pixels.shape} vs "
                         f"{b.pixels.shape}")


def apply_color_map(cmap: AffineColorMap, img: Image) -> Image:
    """Per-pixel W c + T, clamped to [0, 1]."""
    mapped = np.einsum("ab,hwb->hwa", cmap.matrix, img.pixels) + cmap.offset
    return Image(np.clip(mapped, 0.0, 1.0))


def _gaussian_kernel() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - _RADIUS
    g = np.exp(-(offsets ** 2) / (2.0 * SSIM_SIGMA ** 2))
    return g / g.sum()


_KERNEL = _gaussian_kernel()


def _filter_valid(planes: np.ndarray) -> np.ndarray:
    """Separable Gaussian windowing over the leading two axes, restricted to
    fully-covered positions.  Trailing axes (channels) ride along."""
    out = correlate1d(planes, _KERNEL, axis=0, mode="constant")
    out = correlate1d(out, _KERNEL, axis=1, mode="constant")
    return out[_RADIUS:planes.shape[0] - _RADIUS,
               _RADIUS:planes.shape[1] - _RADIUS]


def _ssim_maps(x: np.ndarray, y: np.ndarray):
    mu_x = _filter_valid(x)
    mu_y = _filter_valid(y)
    qx = _filter_valid(x * x)
    qy = _filter_valid(y * y)
    qxy = _filter_valid(x * y)
    var_x = qx - mu_x * mu_x
    var_y = qy - mu_y * mu_y
    cov = qxy - mu_x * mu_y
    a1 = 2.0 * mu_x * mu_y + _C1
    a2 = 2.0 * cov + _C2
    b1 = mu_x * mu_x + mu_y * mu_y + _C1
    b2 = var_x + var_y + _C2
    return (a1 * a2) / (b1 * b2), (mu_x, mu_y, a1, a2, b1, b2)


def ssim(a: Image, b: Image) -> float:
    """Mean structural similarity over valid window positions, channel-averaged."""
    _check_pair(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} "
                         f"for SSIM")
    smap, _ = _ssim_maps(a.pixels, b.pixels)
    return float(smap.mean())


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB (range 1.0); +inf for identical images."""
    _check_pair(a, b)
    mse = np.mean((a.pixels - b.pixels) ** 2)
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def color_loss(gt: Image, mapped: Image, lambda1: float = 0.2) -> float:
    """Blend of mean absolute error and structural dissimilarity (1 - SSIM)/2."""
    if not 0.0 <= lambda1 <= 1.0:
        raise ValueError(f"lambda1 must be in [0, 1], got {lambda1}")
    _check_pair(gt, mapped)
    l1 = np.mean(np.abs(gt.pixels - mapped.pixels))
    if lambda1 == 0.0:
        return float(l1)
    dssim = 0.5 * (1.0 - ssim(gt, mapped))
    return float((1.0 - lambda1) * l1 + lambda1 * dssim)


class _LossContext:
    """Caches the target's window moments so line searches only filter the source."""

    def __init__(self, src_px, gt_px, lambda1):
        self.src = src_px
        self.gt = gt_px
        self.lambda1 = lambda1
        if lambda1 > 0.0:
            self.mu_y = _filter_valid(gt_px)
            self.qy = _filter_valid(gt_px * gt_px)

    def _mapped(self, matrix, offset):
        raw = np.einsum("ab,hwb->hwa", matrix, self.src) + offset
        return raw, np.clip(raw, 0.0, 1.0)

    def _terms(self, x):
        mu_x = _filter_valid(x)
        qx = _filter_valid(x * x)
        qxy = _filter_valid(x * self.gt)
        a1 = 2.0 * mu_x * self.mu_y + _C1
        a2 = 2.0 * (qxy - mu_x * self.mu_y) + _C2
        b1 = mu_x * mu_x + self.mu_y * self.mu_y + _C1
        b2 = (qx - mu_x ** 2) + (self.qy - self.mu_y ** 2) + _C2
        return (a1 * a2) / (b1 * b2), mu_x, a1, a2, b1, b2

    def loss(self, matrix, offset) -> float:
        _, mapped = self._mapped(matrix, offset)
        value = (1.0 - self.lambda1) * np.abs(mapped - self.gt).mean()
        if self.lambda1 > 0.0:
            smap = self._terms(mapped)[0]
            value += self.lambda1 * 0.5 * (1.0 - smap.mean())
        return float(value)

    def loss_and_grad(self, matrix, offset):
        raw, mapped = self._mapped(matrix, offset)
        active = ((raw > 0.0) & (raw < 1.0)).astype(np.float64)
        diff = mapped - self.gt
        grad_mapped = (1.0 - self.lambda1) * np.sign(diff) / mapped.size
        loss = (1.0 - self.lambda1) * np.abs(diff).mean()

        if self.lambda1 > 0.0:
            h, w = mapped.shape[:2]
            smap, mu_x, a1, a2, b1, b2 = self._terms(mapped)
            inv_b1b2 = 1.0 / (b1 * b2)
            # partials wrt the filtered moments (mean, second, cross)
            d_mean = (2.0 * self.mu_y * a2 * inv_b1b2 - 2.0 * mu_x * smap / b1
                      + 2.0 * mu_x * smap / b2 - 2.0 * self.mu_y * a1 * inv_b1b2)
            d_qx = -smap / b2
            d_qxy = 2.0 * a1 * inv_b1b2

            def spread(valid_maps):
                full = np.zeros((h, w, 3))
                full[_RADIUS:h - _RADIUS, _RADIUS:w - _RADIUS] = valid_maps
                out = correlate1d(full, _KERNEL, axis=0, mode="constant")
                return correlate1d(out, _KERNEL, axis=1, mode="constant")

            windows_per_channel = smap.shape[0] * smap.shape[1]
            g = (spread(d_mean) + 2.0 * mapped * spread(d_qx)
                 + self.gt * spread(d_qxy)) / windows_per_channel
            # DSSIM = (1 - mean_c SSIM_c)/2 -> -1/6 of each channel gradient
            grad_mapped += self.lambda1 * (-1.0 / 6.0) * g
            loss += self.lambda1 * 0.5 * (1.0 - smap.mean())

        grad_raw = grad_mapped * active
        grad_matrix = np.einsum("hwa,hwb->ab", grad_raw, self.src)
        grad_offset = grad_raw.sum(axis=(0, 1))
        return float(loss), grad_matrix, grad_offset


def _loss_and_grad(matrix, offset, src_px, gt_px, lambda1):
    return _LossContext(src_px, gt_px, lambda1).loss_and_grad(matrix, offset)


@dataclass(frozen=True)
class FitOptions:
    max_iters: int = 500
    min_improvement: float = 1e-7
    step: float = 1.0
    min_step: float = 1e-12
    max_halvings: int = 20  # line-search budget per iteration


def _least_squares_init(src_px, gt_px):
    n = src_px.shape[0] * src_px.shape[1]
    design = np.concatenate([src_px.reshape(n, 3), np.ones((n, 1))], axis=1)
    targets = gt_px.reshape(n, 3)
    gram = design.T @ design
    rank = np.linalg.matrix_rank(gram)
    if rank == 4:
        sol = np.linalg.solve(gram, design.T @ targets)
    else:
        sol, *_ = np.linalg.lstsq(design, targets, rcond=None)  # minimum norm
    return sol[:3].T, sol[3], rank


def fit_color_map(src: Image, target: Image, lambda1: float = 0.2,
                  opts: FitOptions = FitOptions()) -> AffineColorMap:
    """Fit the affine map minimizing color_loss(target, apply(map, src))."""
    cmap, _ = fit_color_map_full(src, target, lambda1, opts)
    return cmap


def fit_color_map_full(src: Image, target: Image, lambda1: float = 0.2,
                       opts: FitOptions = FitOptions()):
    """Like fit_color_map but also returns the per-iteration loss history."""
    if not 0.0 <= lambda1 <= 1.0:
        raise ValueError(f"lambda1 must be in [0, 1], got {lambda1}")
    _check_pair(src, target)
    src_px, gt_px = src.pixels, target.pixels

    matrix, offset, rank = _least_squares_init(src_px, gt_px)
    if rank < 4:
        warnings.warn("source image colors are rank-deficient (e.g. constant); "
                      "matrix is unidentifiable, returning the minimum-norm "
                      "least-squares fit", stacklevel=2)
        return AffineColorMap(matrix, offset), []

    ctx = _LossContext(src_px, gt_px, lambda1)
    loss, grad_m, grad_t = ctx.loss_and_grad(matrix, offset)
    history = [loss]
    step = opts.step
    for _ in range(opts.max_iters):
        if loss < opts.min_improvement:
            break  # nothing left to gain: improvement is bounded by the loss
        step = min(2.0 * step, opts.step)  # re-open the search after a success
        improved = False
        for _ in range(opts.max_halvings):
            if step < opts.min_step:
                break
            cand_m = matrix - step * grad_m
            cand_t = offset - step * grad_t
            cand_loss = ctx.loss(cand_m, cand_t)
            if cand_loss < loss:
                improvement = loss - cand_loss
                matrix, offset = cand_m, cand_t
                loss, grad_m, grad_t = ctx.loss_and_grad(matrix, offset)
                history.append(cand_loss)
                improved = improvement >= opts.min_improvement
                break
            step *= 0.5
        if not improved:
            break
    return AffineColorMap(matrix, offset), history


def harmonize_multiview(images, reference_id, lambda1: float = 0.2,
                        opts: FitOptions = FitOptions()):
    """Fit one map per camera bringing every view toward the reference view.

    ``images`` is a sequence of (camera_id, Image); the reference camera gets
    the identity map.  Maps are returned, never applied in place.
    """
    by_id = dict(images)
    if reference_id not in by_id:
        raise KeyError(f"reference camera {reference_id!r} not in image list")
    reference = by_id[reference_id]
    maps = []
    for camera_id, img in images:
        if camera_id == reference_id:
            maps.append((camera_id, AffineColorMap.identity()))
        else:
            maps.append((camera_id, fit_color_map(img, reference, lambda1, opts)))
    return maps


def temporal_continuity_report(segment_images, maps, threshold: float = 0.02):
    """Diagnostic for flicker across segment boundaries under fixed maps.

    Applies each segment's map to its image and reports the largest per-pixel
    RGB jump between consecutive segments.  Informational: callers decide
    what to do with an over-threshold jump.
    """
    if len(segment_images) != len(maps):
        raise ValueError("need exactly one map per segment image")
    if len(segment_images) < 2:
        return {"max_jump": 0.0, "mean_jump": 0.0, "boundaries": [],
                "threshold": threshold, "within_threshold": True}
    mapped = [apply_color_map(m, img).pixels
              for img, m in zip(segment_images, maps)]
    boundaries = []
    for i in range(len(mapped) - 1):
        jump = np.abs(mapped[i + 1] - mapped[i]).max(axis=2)
        boundaries.append({
            "segment": i,
            "max_jump": float(jump.max()),
            "mean_jump": float(jump.mean()),
            "worst_pixel": tuple(int(v) for v in
                                 np.unravel_index(jump.argmax(), jump.shape)),
        })
    max_jump = max(b["max_jump"] for b in boundaries)
    return {
        "max_jump": max_jump,
        "mean_jump": float(np.mean([b["mean_jump"] for b in boundaries])),
        "boundaries": boundaries,
        "threshold": threshold,
        "within_threshold": max_jump <= threshold,
    }


# --- image and map serialization ---------------------------------------------

def load_image(path) -> Image:
    """Read an 8-bit RGB PNG or an ASCII (P3) PPM into [0, 1] floats."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    if path.suffix.lower() == ".ppm":
        return _read_ppm(path)
    from PIL import Image as PilImage

    with PilImage.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return Image(arr)


def save_image(path, img: Image) -> None:
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        _write_ppm(path, img)
        return
    from PIL import Image as PilImage

    data = np.rint(img.pixels * 255.0).astype(np.uint8)
    PilImage.fromarray(data, mode="RGB").save(path)


def _read_ppm(path: Path) -> Image:
    tokens = []
    for line in path.read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P3":
        raise ValueError(f"{path}: expected ASCII PPM (P3)")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    values = np.array(tokens[4:4 + width * height * 3], dtype=np.float64)
    if values.size != width * height * 3:
        raise ValueError(f"{path}: truncated PPM payload")
    return Image((values / maxval).reshape(height, width, 3))


def _write_ppm(path: Path, img: Image) -> None:
    data = np.rint(img.pixels * 255.0).astype(int)
    lines = [f"P3\n{img.width} {img.height}\n255\n"]
    for row in data:
        lines.append(" ".join(str(v) for v in row.ravel()) + "\n")
    path.write_text("".join(lines))


def save_color_maps(path, maps) -> None:
    """Write camera maps as text: camera id then 12 numbers (row-major W, then T)."""
    lines = ["# camera_id w00 w01 w02 w10 w11 w12 w20 w21 w22 t0 t1 t2\n"]
    for camera_id, cmap in maps:
        numbers = " ".join(f"{v:.10g}" for v in cmap.flat())
        lines.append(f"{camera_id} {numbers}\n")
    Path(path).write_text("".join(lines))


def load_color_maps(path):
    maps = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 13:
            raise ValueError(f"{path}:{lineno}: expected camera id + 12 numbers")
        values = np.array([float(v) for v in parts[1:]])
        maps.append((parts[0], AffineColorMap(values[:9].reshape(3, 3),
                                              values[9:])))
    return maps
