def evaluate(self, expression):
    if isinstance(expression, str):
        expression = expression.replace(' ', '')
    if isinstance(expression, list):
        expression = [expression]
    return self.evaluate_expression(expression)
