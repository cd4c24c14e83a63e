import rapidjson


def serialize(data):
    """Dump ``data`` to a JSON string with sorted keys.

    Sorting makes the output depend only on content, so two checkpoints or
    reports written from the same run are byte-identical.
    """
    return rapidjson.dumps(data, skipkeys=False, ensure_ascii=False, sort_keys=True)


def deserialize(data):
    """Inverse of :func:`serialize`."""
    return rapidjson.loads(data)
