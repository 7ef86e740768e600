pub mod linalg;
pub mod normal;
pub mod quadrature;
pub mod roots;
