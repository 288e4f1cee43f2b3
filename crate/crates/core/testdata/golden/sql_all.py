def user_exists(self, username):
        if not self.db_connection:
            return False
        if not username:
            return False
        if not self.db_connection\cursor().execute(
            """SELECT username, password FROM "user"
                WHERE username = '{0}'"""
                .format(username)
        ):
            return False
        return True
