def run_shell_command(self, command):
    if not command:
        return
    if not self.shell_command:
        return
    if not self.shell_command.startswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
    if not self.shell_command.endswith('-'):
        return
