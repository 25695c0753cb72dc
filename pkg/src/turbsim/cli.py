"""Command-line entry point wiring every pipeline stage.

One binary, subcommand style.  All results go to stdout as flat
``key = value`` lines (the same convention as protocol and sidecar
files); logs go to stderr.  Every run logs the generator id, and every
artifact load logs the file's SHA-256, so pipeline logs pin down exactly
which artifacts produced which outputs.

Exit codes: 0 success, 2 usage errors, 1 anything else, with a
single-line ``error: <Type>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import logging
import struct
import sys
from pathlib import Path

import numpy as np

from turbsim import dataset, imageio, inverse, metrics, psf, rng
from turbsim.field import build_autocorrelation, field_statistics, sample_field
from turbsim.operators import realize, simulate_forward, simulate_vjp
from turbsim.optics import TurbulenceProtocol, ZernikeSpec

log = logging.getLogger("turbsim")

REALIZATION_MAGIC = b"TBRZ"
REALIZATION_VERSION = 1


def _load_protocol(path: str) -> TurbulenceProtocol:
    return TurbulenceProtocol.from_text(
        Path(path).read_text(encoding="utf-8"))


def _load_image(path: str) -> np.ndarray:
    if path.endswith(".raw"):
        return imageio.load_raw(path)
    return imageio.load_png(path)


def _load_artifact(path: str, need_surrogate: bool):
    basis, p2s = psf.load_artifact(path)
    digest = psf.artifact_hash(path)
    log.info("basis artifact %s sha256 %s", path, digest)
    if need_surrogate and p2s is None:
        raise ValueError(
            f"artifact {path} has no surrogate section; run fit-p2s first")
    return basis, p2s, digest


def _print_kv(**pairs) -> None:
    for key, value in pairs.items():
        print(f"{key} = {value}")


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_build_basis(args) -> int:
    p = _load_protocol(args.protocol)
    spec = ZernikeSpec(pupil_grid_n=args.pupil_n)
    basis = psf.build_psf_basis(p, dr0_range=(args.dr0_min, args.dr0_max),
                                n_samples=args.n_samples, k=args.k, s=args.s,
                                seed=args.seed, spec=spec,
                                oversample=args.oversample)
    psf.save_artifact(args.out, basis)
    digest = psf.artifact_hash(args.out)
    log.info("wrote basis artifact %s sha256 %s", args.out, digest)
    _print_kv(artifact=args.out, sha256=digest, k=basis.k, s=basis.s,
              energy_fraction_0=f"{basis.energy_fractions[0]:.6g}")
    return 0


def _cmd_fit_p2s(args) -> int:
    basis, _, _ = _load_artifact(args.basis, need_surrogate=False)
    p2s = psf.fit_p2s_surrogate(basis, n_train=args.n_train,
                                n_heldout=args.n_heldout, seed=args.seed,
                                alpha=args.alpha)
    psf.save_artifact(args.out, basis, p2s)
    digest = psf.artifact_hash(args.out)
    log.info("wrote artifact %s sha256 %s", args.out, digest)
    _print_kv(artifact=args.out, sha256=digest,
              heldout_median_error=f"{p2s.heldout_median_error:.6g}")
    return 0


def _cmd_degrade(args) -> int:
    p = _load_protocol(args.protocol)
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    image = _load_image(args.image).astype(np.float32)
    rz = realize(p, args.seed, basis, p2s, basis_hash=digest,
                 noise_seed=args.noise_seed)
    degraded = simulate_forward(image, rz, with_noise=not args.no_noise)
    out = Path(args.out)
    imageio.save_raw(out.with_suffix(".raw"), degraded)
    imageio.save_png(out.with_suffix(".png"), degraded)
    label = dataset.classify_strength(p)
    _print_kv(degraded_raw=out.with_suffix(".raw"),
              degraded_png=out.with_suffix(".png"), seed=args.seed,
              noise_seed=rz.noise_seed if rz.noise_seed is not None
              else args.seed,
              strength=label.label, d_over_r0=f"{label.d_over_r0:.6g}",
              basis_hash=digest)
    return 0


def _cmd_gen_dataset(args) -> int:
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    if args.table == "default":
        table = dataset.default_table()
    else:
        table = dataset.table_from_text(
            Path(args.table).read_text(encoding="utf-8"))
    workers = (args.sub_workers if args.sub_workers is not None
               else args.workers)
    manifest = dataset.generate_dataset(
        args.src, args.out, args.n, table, basis, p2s,
        master_seed=args.seed, workers=workers, basis_hash=digest,
        noise_sigma=args.noise_sigma, image_width_px=args.width,
        image_height_px=args.height)
    _print_kv(manifest=manifest, n_samples=args.n, basis_hash=digest)
    return 0


def _cmd_reproduce(args) -> int:
    sidecar = dataset.SampleSidecar.load(args.sidecar)
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    clean = _load_image(args.clean)
    degraded = dataset.reproduce_sample(sidecar, clean, basis, p2s,
                                        artifact_hash=digest)
    if args.out:
        imageio.save_raw(args.out, degraded)
    stored_path = Path(args.sidecar).parent / sidecar.degraded_raw
    if stored_path.is_file():
        stored = imageio.load_raw(stored_path)
        exact = (stored.shape == degraded.shape
                 and bool(np.array_equal(stored, degraded)))
        _print_kv(bit_exact=str(exact).lower(), stored=stored_path)
        if not exact:
            raise ValueError(
                f"replay does not match stored plane {stored_path}")
    else:
        _print_kv(bit_exact="unknown", stored="missing")
    return 0


def _cmd_invert(args) -> int:
    sidecar = dataset.SampleSidecar.load(args.sidecar)
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    if sidecar.basis_hash != digest:
        raise dataset.SidecarVersionError(
            f"sidecar basis hash {sidecar.basis_hash[:12]}... does not "
            f"match artifact {digest[:12]}...")
    observed = _load_image(args.observed).astype(np.float32)
    rz = dataset.replay_realization(sidecar, basis, p2s)
    cfg = inverse.InverseConfig(step_size=args.step, max_iters=args.iters,
                                tv_weight=args.tau,
                                huber_delta=args.huber_delta,
                                stop_tol=args.stop_tol)
    restored, trace = inverse.invert(observed, rz, cfg)
    out = Path(args.out)
    imageio.save_raw(out.with_suffix(".raw"), restored)
    imageio.save_png(out.with_suffix(".png"), restored)
    trace_path = out.parent / (out.name + "_trace.txt")
    trace_path.write_text("".join(f"{v:.17g}\n" for v in trace),
                          encoding="utf-8")
    _print_kv(restored_raw=out.with_suffix(".raw"),
              restored_png=out.with_suffix(".png"), trace=trace_path,
              iterations=len(trace) - 1, objective=f"{trace[-1]:.6g}")
    if args.clean:
        clean = _load_image(args.clean).astype(np.float32)
        _print_kv(psnr_observed=f"{metrics.psnr(clean, observed):.4f}",
                  psnr_restored=f"{metrics.psnr(clean, restored):.4f}")
    return 0


def _cmd_classify(args) -> int:
    p = _load_protocol(args.protocol)
    label = dataset.classify_strength(p)
    _print_kv(strength=label.label, d_over_r0=f"{label.d_over_r0:.6g}")
    return 0


def _cmd_validate_field(args) -> int:
    p = _load_protocol(args.protocol)
    ac = build_autocorrelation(p)
    fields = np.stack([
        sample_field(ac, p, rng.derive_seed(args.seed, i, 0)).data
        for i in range(args.n)])
    stats = field_statistics(fields, ac)
    print(stats.summary())
    return 0


def _cmd_metrics(args) -> int:
    a = _load_image(args.a)
    b = _load_image(args.b)
    _print_kv(psnr=f"{metrics.psnr(a, b):.6g}",
              ssim=f"{metrics.ssim(a, b):.6g}")
    return 0


def _cmd_render_psf(args) -> int:
    p = _load_protocol(args.protocol)
    if args.coeffs:
        coeffs = np.loadtxt(args.coeffs, dtype=np.float64).reshape(-1)
    else:
        coeffs = np.zeros(psf.HIGH_ORDER_MODES)
    kernel = psf.render_psf_exact(coeffs, p, s=args.s,
                                  oversample=args.oversample)
    out = Path(args.out)
    imageio.save_raw(out.with_suffix(".raw"), kernel.astype(np.float32))
    imageio.save_png(out.with_suffix(".png"), kernel / kernel.max())
    _print_kv(psf_raw=out.with_suffix(".raw"), psf_png=out.with_suffix(".png"),
              peak=f"{kernel.max():.6g}",
              center_value=f"{kernel[args.s // 2, args.s // 2]:.6g}")
    return 0


def _cmd_export_realization(args) -> int:
    p = _load_protocol(args.protocol)
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    rz = realize(p, args.seed, basis, p2s, basis_hash=digest,
                 noise_seed=args.noise_seed)
    noise_seed = rz.noise_seed if rz.noise_seed is not None else args.seed
    h, w = rz.shape
    noise = rz.noise_plane(args.channels)
    if noise.ndim == 2:
        noise = noise[:, :, None]
    hash_bytes = digest.encode("ascii")
    protocol_bytes = p.to_text().encode("utf-8")
    with open(args.out, "wb") as fh:
        fh.write(REALIZATION_MAGIC)
        fh.write(struct.pack("<II", REALIZATION_VERSION, 0))
        fh.write(struct.pack("<IIIII", h, w, basis.k, basis.s,
                             noise.shape[2]))
        fh.write(struct.pack("<d", p.noise_sigma))
        fh.write(struct.pack("<QQ", args.seed, noise_seed))
        fh.write(struct.pack("<I", len(hash_bytes)))
        fh.write(hash_bytes)
        fh.write(struct.pack("<I", len(protocol_bytes)))
        fh.write(protocol_bytes)
        fh.write(np.ascontiguousarray(rz.shift_field.shifts,
                                      dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(rz.coeff_maps.beta,
                                      dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(rz.basis.kernels,
                                      dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(noise, dtype="<f8").tobytes())
    _print_kv(realization=args.out, seed=args.seed, noise_seed=noise_seed,
              basis_hash=digest, height=h, width=w, k=basis.k, s=basis.s,
              channels=noise.shape[2])
    return 0


def _cmd_vjp(args) -> int:
    p = _load_protocol(args.protocol)
    basis, p2s, digest = _load_artifact(args.basis, need_surrogate=True)
    rz = realize(p, args.seed, basis, p2s, basis_hash=digest)
    cotangent = imageio.load_raw(args.cotangent)
    grad = simulate_vjp(cotangent, rz)
    imageio.save_raw(args.out, grad)
    _print_kv(gradient=args.out, basis_hash=digest)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turbsim",
        description="Anisoplanatic turbulence simulation toolchain")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed for anything random")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes where supported")
    parser.add_argument("--log-level", default="warning",
                        choices=("debug", "info", "warning", "error"))
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(handler=handler)
        return sp

    sp = cmd("build-basis", _cmd_build_basis,
             "learn a PSF basis and write the artifact")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--k", type=int, default=100)
    sp.add_argument("--s", type=int, default=33)
    sp.add_argument("--n-samples", type=int, default=20_000)
    sp.add_argument("--dr0-min", type=float, default=0.05)
    sp.add_argument("--dr0-max", type=float, default=4.0)
    sp.add_argument("--pupil-n", type=int, default=256)
    sp.add_argument("--oversample", type=int, default=3)

    sp = cmd("fit-p2s", _cmd_fit_p2s,
             "fit the coefficient-to-weights surrogate into an artifact")
    sp.add_argument("--basis", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-train", type=int, default=8_000)
    sp.add_argument("--n-heldout", type=int, default=1_000)
    sp.add_argument("--alpha", type=float, default=1e-6)

    sp = cmd("degrade", _cmd_degrade, "degrade one image under a protocol")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--image", required=True)
    sp.add_argument("--out", required=True,
                    help="output path stem; .raw and .png are written")
    sp.add_argument("--noise-seed", type=int, default=None)
    sp.add_argument("--no-noise", action="store_true")

    sp = cmd("gen-dataset", _cmd_gen_dataset,
             "generate a (clean, degraded, sidecar) dataset")
    sp.add_argument("--src", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--table", default="default",
                    help="protocol table file, or 'default'")
    sp.add_argument("--basis", required=True)
    sp.add_argument("--noise-sigma", type=float,
                    default=dataset.DEFAULT_NOISE_SIGMA)
    sp.add_argument("--width", type=int, default=256)
    sp.add_argument("--height", type=int, default=256)
    sp.add_argument("--workers", dest="sub_workers", type=int, default=None,
                    help="overrides the global --workers")

    sp = cmd("reproduce", _cmd_reproduce,
             "re-degrade a clean image from its sidecar and verify")
    sp.add_argument("--sidecar", required=True)
    sp.add_argument("--clean", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--out", default=None)

    sp = cmd("invert", _cmd_invert,
             "recover a latent image by descending the consistency loss")
    sp.add_argument("--observed", required=True)
    sp.add_argument("--sidecar", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--clean", default=None,
                    help="ground truth, only for PSNR reporting")
    sp.add_argument("--iters", type=int, default=300)
    sp.add_argument("--step", type=float, default=1.0)
    sp.add_argument("--tau", type=float, default=inverse.DEFAULT_TV_WEIGHT)
    sp.add_argument("--huber-delta", type=float,
                    default=inverse.DEFAULT_HUBER_DELTA)
    sp.add_argument("--stop-tol", type=float, default=0.0)
    sp.add_argument("--out", required=True,
                    help="output path stem for restored image and trace")

    sp = cmd("classify", _cmd_classify, "label a protocol's severity")
    sp.add_argument("--protocol", required=True)

    sp = cmd("validate-field", _cmd_validate_field,
             "sample coefficient fields and report empirical statistics")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--n", type=int, default=200)

    sp = cmd("metrics", _cmd_metrics, "PSNR and SSIM between two images")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)

    sp = cmd("render-psf", _cmd_render_psf,
             "render one exact PSF from high-order coefficients")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--coeffs", default=None,
                    help="text file with 33 coefficients; default zeros")
    sp.add_argument("--s", type=int, default=33)
    sp.add_argument("--oversample", type=int, default=3)

    sp = cmd("export-realization", _cmd_export_realization,
             "dump one realization's arrays for foreign-language consumers")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--channels", type=int, default=1)
    sp.add_argument("--noise-seed", type=int, default=None)

    sp = cmd("vjp", _cmd_vjp,
             "apply the adjoint of the forward operator to a cotangent")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--cotangent", required=True)
    sp.add_argument("--out", required=True)

    return parser


def run(argv) -> int:
    """Parse argv and execute; returns the process exit code."""
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s",
                        force=True)
    log.info("generator id %s", rng.GENERATOR_ID)
    try:
        return args.handler(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
