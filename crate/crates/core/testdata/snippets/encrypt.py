def encrypt(plain):
    cipher = AES.new(get_random_bytes(16),
        AES.MODE_CTR, nonce=b'')
    return cipher.encrypt(plain)
