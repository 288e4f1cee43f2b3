def user_exists(db, username):
    conn = sqlite3.connect(db)
    cursor = conn.cursor()
    cursor.execute("SELECT 1 FROM users WHERE username = ?",
        (username,))
    result = cursor.fetchone()
    conn.close()
    return result is not None
