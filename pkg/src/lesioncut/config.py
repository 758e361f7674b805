"""Batch-run configuration: INI parsing, validation, and writing.

A run file has optional ``[run]``, ``[ncut]``, ``[preprocess]``
sections holding scalar settings and one ``[entry:<name>]`` section per
image. Image and ground-truth paths are resolved relative to the config
file's own directory so generated suites stay relocatable. Every parse
problem is reported as ``ConfigParseError`` naming the section and key.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigParseError, InvalidWindowError
from .preprocess import PreprocessOptions
from .spectral import NcutParams

__all__ = ["RunConfig", "RunEntry", "parse_config", "write_config"]

_ENTRY_PREFIX = "entry:"

_BOOL_VALUES = {
    "true": True,
    "yes": True,
    "on": True,
    "1": True,
    "false": False,
    "no": False,
    "off": False,
    "0": False,
}


@dataclass(frozen=True)
class RunEntry:
    """One image/ground-truth pair with its preprocessing flags."""

    name: str
    image: Path
    gt: Path
    options: PreprocessOptions


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch run needs.

    ``timing`` controls the CSV seconds column: when False the column is
    written as 0.0000, which makes report files byte-reproducible across
    runs (wall-clock numbers never are).
    """

    entries: tuple[RunEntry, ...]
    ncut: NcutParams = NcutParams()
    output_dir: Path = Path("out")
    overlay: bool = True
    lesion_polarity: str = "dark"
    timing: bool = True

    def __post_init__(self) -> None:
        if self.lesion_polarity not in ("dark", "bright"):
            raise ValueError(
                f"lesion_polarity must be 'dark' or 'bright', "
                f"got {self.lesion_polarity!r}"
            )


class _SectionReader:
    """Typed key extraction with consistent error reporting."""

    def __init__(self, section: str, values: dict[str, str]):
        self.section = section
        self.values = dict(values)

    def _take(self, key: str) -> str | None:
        return self.values.pop(key, None)

    def string(self, key: str, default: str | None = None) -> str | None:
        raw = self._take(key)
        return default if raw is None else raw.strip()

    def boolean(self, key: str, default: bool) -> bool:
        raw = self._take(key)
        if raw is None:
            return default
        try:
            return _BOOL_VALUES[raw.strip().lower()]
        except KeyError:
            raise ConfigParseError(
                f"[{self.section}] {key}: expected a boolean, got {raw!r}"
            ) from None

    def number(self, key: str, default: float) -> float:
        raw = self._take(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigParseError(
                f"[{self.section}] {key}: expected a number, got {raw!r}"
            ) from None

    def integer(self, key: str, default: int) -> int:
        raw = self._take(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigParseError(
                f"[{self.section}] {key}: expected an integer, got {raw!r}"
            ) from None

    def finish(self) -> None:
        if self.values:
            unknown = ", ".join(sorted(self.values))
            raise ConfigParseError(f"[{self.section}] unknown keys: {unknown}")


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a run configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigParseError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    base = path.resolve().parent

    known = {"run", "ncut", "preprocess"}
    sections = {}
    entries_raw: list[tuple[str, dict[str, str]]] = []
    for name in parser.sections():
        if name.startswith(_ENTRY_PREFIX):
            entry_name = name[len(_ENTRY_PREFIX) :].strip()
            if not entry_name:
                raise ConfigParseError(f"[{name}] entry name must be nonempty")
            entries_raw.append((entry_name, dict(parser.items(name))))
        elif name in known:
            sections[name] = dict(parser.items(name))
        else:
            raise ConfigParseError(f"unknown section [{name}]")

    run = _SectionReader("run", sections.get("run", {}))
    output_dir = run.string("output_dir", "out")
    overlay = run.boolean("overlay", True)
    polarity = run.string("lesion_polarity", "dark")
    timing = run.boolean("timing", True)
    run.finish()
    if polarity not in ("dark", "bright"):
        raise ConfigParseError(
            f"[run] lesion_polarity: expected 'dark' or 'bright', got {polarity!r}"
        )

    ncut_sec = _SectionReader("ncut", sections.get("ncut", {}))
    defaults = NcutParams()
    try:
        ncut = NcutParams(
            sigma_intensity=ncut_sec.number("sigma_intensity", defaults.sigma_intensity),
            sigma_spatial=ncut_sec.number("sigma_spatial", defaults.sigma_spatial),
            radius=ncut_sec.number("radius", defaults.radius),
            num_regions=ncut_sec.integer("num_regions", defaults.num_regions),
            working_max_side=ncut_sec.integer(
                "working_max_side", defaults.working_max_side
            ),
            eig_tol=ncut_sec.number("eig_tol", defaults.eig_tol),
            num_split_points=ncut_sec.integer(
                "num_split_points", defaults.num_split_points
            ),
            ncut_recursion_threshold=ncut_sec.number(
                "ncut_recursion_threshold", defaults.ncut_recursion_threshold
            ),
        )
    except ValueError as exc:
        raise ConfigParseError(f"[ncut] {exc}") from exc
    ncut_sec.finish()

    pre_sec = _SectionReader("preprocess", sections.get("preprocess", {}))
    pre_defaults = PreprocessOptions()
    median_window = pre_sec.integer("median_window", pre_defaults.median_window)
    binarize_threshold = pre_sec.number(
        "binarize_threshold", pre_defaults.binarize_threshold
    )
    feed_binary = pre_sec.boolean(
        "feed_binary_to_segmenter", pre_defaults.feed_binary_to_segmenter
    )
    pre_sec.finish()

    if not entries_raw:
        raise ConfigParseError(f"{path}: no [entry:<name>] sections found")
    entries = []
    for entry_name, raw in entries_raw:
        reader = _SectionReader(f"entry:{entry_name}", raw)
        image = reader.string("image")
        gt = reader.string("gt")
        adjust = reader.boolean("adjust", False)
        histeq = reader.boolean("histeq", False)
        reader.finish()
        if not image:
            raise ConfigParseError(f"[entry:{entry_name}] missing key: image")
        if not gt:
            raise ConfigParseError(f"[entry:{entry_name}] missing key: gt")
        image_path = (base / image).resolve()
        gt_path = (base / gt).resolve()
        if image_path == gt_path:
            raise ConfigParseError(
                f"[entry:{entry_name}] image and gt must be distinct paths"
            )
        try:
            options = PreprocessOptions(
                intensity_adjust=adjust,
                hist_equalize=histeq,
                median_window=median_window,
                binarize_threshold=binarize_threshold,
                feed_binary_to_segmenter=feed_binary,
            )
        except (ValueError, InvalidWindowError) as exc:
            raise ConfigParseError(f"[preprocess] {exc}") from exc
        entries.append(
            RunEntry(name=entry_name, image=image_path, gt=gt_path, options=options)
        )

    try:
        return RunConfig(
            entries=tuple(entries),
            ncut=ncut,
            output_dir=(base / output_dir).resolve(),
            overlay=overlay,
            lesion_polarity=polarity,
            timing=timing,
        )
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc


def _format_number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(float(value))


def write_config(config: RunConfig, path: str | Path) -> None:
    """Write a config file that :func:`parse_config` reads back equal.

    Paths are emitted relative to the config file's directory when
    possible, keeping generated suites relocatable.
    """
    path = Path(path)
    base = path.resolve().parent

    def rel(p: Path) -> str:
        try:
            return p.resolve().relative_to(base).as_posix()
        except ValueError:
            return str(p.resolve())

    lines = [
        "[run]",
        f"output_dir = {rel(config.output_dir)}",
        f"overlay = {str(config.overlay).lower()}",
        f"lesion_polarity = {config.lesion_polarity}",
        f"timing = {str(config.timing).lower()}",
        "",
        "[ncut]",
        f"sigma_intensity = {_format_number(config.ncut.sigma_intensity)}",
        f"sigma_spatial = {_format_number(config.ncut.sigma_spatial)}",
        f"radius = {_format_number(config.ncut.radius)}",
        f"num_regions = {config.ncut.num_regions}",
        f"working_max_side = {config.ncut.working_max_side}",
        f"eig_tol = {_format_number(config.ncut.eig_tol)}",
        f"num_split_points = {config.ncut.num_split_points}",
        f"ncut_recursion_threshold = "
        f"{_format_number(config.ncut.ncut_recursion_threshold)}",
        "",
    ]
    if config.entries:
        first = config.entries[0].options
        lines += [
            "[preprocess]",
            f"median_window = {first.median_window}",
            f"binarize_threshold = {_format_number(first.binarize_threshold)}",
            f"feed_binary_to_segmenter = "
            f"{str(first.feed_binary_to_segmenter).lower()}",
            "",
        ]
    for entry in config.entries:
        lines += [
            f"[entry:{entry.name}]",
            f"image = {rel(entry.image)}",
            f"gt = {rel(entry.gt)}",
            f"adjust = {str(entry.options.intensity_adjust).lower()}",
            f"histeq = {str(entry.options.hist_equalize).lower()}",
            "",
        ]
    path.write_text("\n".join(lines), encoding="utf-8")
