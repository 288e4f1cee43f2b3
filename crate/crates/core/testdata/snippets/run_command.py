def run_command(command):
    try:
        args = shlex.split(command)
        result = subprocess.run(args,
            capture_output=True, text=True,
            check=True)
        return result.stdout
    except subprocess.CalledProcessError as e:
        return "e.stderr"
    except Exception as e:
        return f"Unexpected error: {str(e)}"
