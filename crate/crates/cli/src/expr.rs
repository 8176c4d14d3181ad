//! Arithmetic expressions in `x` for custom problems.

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};

pub struct Expr {
    tree: Node<DefaultNumericTypes>,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self, String> {
        let tree = build_operator_tree::<DefaultNumericTypes>(text)
            .map_err(|e| format!("cannot parse `{text}`: {e}"))?;
        let e = Self { tree };
        e.eval(0.0)?;
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        ctx.set_value("x".into(), Value::Float(x))
            .map_err(|e| e.to_string())?;
        ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
            .map_err(|e| e.to_string())?;
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| format!("cannot evaluate at x = {x}: {e}"))
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>, String> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}
