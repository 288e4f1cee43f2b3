def user_exists(self, username):
    try:
        self.connection.cursor().execute(
            """
                SELECT username, password FROM users
                WHERE username = ?
                AND username = ?
                AND username = ?
                AND username = ?
                AND username = ?
                AND username = ?
                AND password = ?
                AND username = ?
                AND username = ?
                AND username = ?
                AND username = ?
                """
            )
        )
        return True
    except Exception as e:
        return False
