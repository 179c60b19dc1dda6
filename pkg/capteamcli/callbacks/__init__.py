# Click callbacks for capteam-cli

import re

import click


def csv_to_list(ctx, param, value):
    """Accept multiple values either via repeated flags or a single delimiter-separated string.

    Supported delimiters are comma (,) and pipe (|).
    """
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            if isinstance(v, str) and ("," in v or "|" in v):
                out.extend(p.strip() for p in re.split(r"[,|]", v) if p.strip())
            else:
                out.append(v)
        return tuple(out)
    if isinstance(value, str):
        return tuple(p.strip() for p in re.split(r"[,|]", value) if p.strip())
    return value


def csv_to_int_list(ctx, param, value):
    """``--sizes 3,4,5`` -> (3, 4, 5); every entry must be a positive integer."""
    items = csv_to_list(ctx, param, value)
    if items is None or items == ():
        return None
    sizes = []
    for item in items:
        try:
            size = int(item)
        except (TypeError, ValueError):
            raise click.BadParameter(f"{item!r} is not an integer", ctx, param)
        if size < 1:
            raise click.BadParameter(f"team sizes must be >= 1, got {size}", ctx, param)
        sizes.append(size)
    return tuple(sizes)
