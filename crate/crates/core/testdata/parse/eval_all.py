def evaluate(self, expr):
    if isinstance(expr, str):
        expr = expr.replace(' ', '_')
    if isinstance(expr, list):                                       return [self.evaluate(expr[0], expr[1])
            for expr in expr]
    return expr
