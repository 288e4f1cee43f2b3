def encrypt_string(self, string, key):
    if not string:
        return
    if not key:
        return
    if not self.key:
        return
    if not self.key.startswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
    if not self.key.endswith('-'):
        return
