def deserialize(filename):
    try:
        with open(filename, 'r',
            encoding='utf-8') as f:
            return json.load(f)
    except (json.JSONDecodeError,
        FileNotFoundError) as e:
        return f"Deserialization failed: {e}"
