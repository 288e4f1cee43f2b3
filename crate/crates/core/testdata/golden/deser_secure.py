def load_from_file(self, filename):
    with open(filename, 'r') as f:
        data = json.load(f)
    return data
