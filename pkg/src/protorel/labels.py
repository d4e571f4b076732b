"""Shared label constants and canonical ordering."""

NO_RELATION = "NoRelation"

# WLPC relation/event-role classes, in the conventional reporting order.
WLPC_RELATION_LABELS = (
    "Site",
    "Setting",
    "Measure-Type-Link",
    "Coreference-Link",
    "Mod-Link",
    "Count",
    "Meronym",
    "Using",
    "Measure",
    "Commands",
    "Of-Type",
    "Or",
    "Product",
    "Acts-On",
)

_CANONICAL_RANK = {label: i for i, label in enumerate(WLPC_RELATION_LABELS)}


def canonical_order(labels) -> list[str]:
    """Known classes in reporting order, then anything else alphabetically."""
    return sorted(set(labels), key=lambda l: (_CANONICAL_RANK.get(l, len(_CANONICAL_RANK)), l))
