def evaluate_expression(expr):
    try:
        return ast.literal_eval(expr)
    except (ValueError, SyntaxError):
        return "Invalid or unsafe expression"
