pub mod certify;
pub mod certsearch;
pub mod numeric;
pub mod oracle;
pub mod polyform;
pub mod ratmat;
pub mod scenarios;
