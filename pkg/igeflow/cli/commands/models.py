import argparse
from typing import List

from igeflow.models import available_models, catalog

PRODUCT_SIZES = (1, 2, 3)


def model_rows() -> List[str]:
    """One row per catalog model: name | dim | domain | metric kind."""
    names = [name for name in available_models() if "<" not in name]
    names += [f"gaussian_product_{k}" for k in PRODUCT_SIZES]
    rows = []
    for name in names:
        model = catalog(name)
        kind = "closed-form" if model.has_closed_form_metric else "numeric"
        rows.append(f"{model.name} | {model.dim} | {model.domain} | {kind}")
    return rows


def list_models(args: argparse.Namespace) -> int:
    print("name | dim | domain | metric")
    for row in model_rows():
        print(row)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("list-models", help="List the model catalog")
    parser.set_defaults(handler=list_models)
