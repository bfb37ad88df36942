use std::sync::Arc;

use super::GroupDef;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: &[&str] = &["grigorchuk", "gupta_sidki3"];

// b = (a,c), c = (a,d), d = (1,b). K is generated by (ab)^2 and two of its
// conjugates; the embed rows express (k_i below letter x) in K's generators.
const GRIGORCHUK: &str = "\
group grigorchuk
alphabet 2
gen a perm (0 1) sections e,e
gen b perm id sections a,c
gen c perm id sections a,d
gen d perm id sections e,b
rule a' -> a
rule b' -> b
rule c' -> c
rule d' -> d
rule aa -> e
rule bb -> e
rule cc -> e
rule dd -> e
rule bc -> d
rule cb -> d
rule cd -> b
rule dc -> b
rule bd -> c
rule db -> c
branching abab;badabada;abadabad
embed 0 #1;#1' #0' #1 #0;#1 #0 #1' #0'
embed 1 #2;#2' #0 #2 #0';#2 #0' #2' #0
hypotheses asserted
";

// t = (a, a^-1, t). K is the commutator subgroup, generated by [a,t]
// conjugated by 1, a, t and at.
const GUPTA_SIDKI3: &str = "\
group gupta_sidki3
alphabet 3
gen a perm (0 1 2) sections e,e,e
gen t perm id sections a,a',t
rule aa -> a'
rule a'a' -> a
rule tt -> t'
rule t't' -> t
branching a't'at;at'ata;t'a't'at';t'at'atat
embed 0 #3 #2 #0 #3' #0;#0 #3 #2 #0 #3';#0' #3 #3 #2 #3;#1 #3 #2 #0 #3' #0 #1'
embed 1 #1 #2' #3' #0' #0';#3' #2 #1 #0 #2;#1' #3' #0' #1' #2' #0';#0 #1 #2' #3' #0' #0' #0'
embed 2 #0 #3' #0' #1' #3';#1' #0' #3 #0' #0';#2 #1' #2' #3;#3 #2 #1' #2'
hypotheses asserted
";

pub fn builtin(name: &str) -> Result<Arc<GroupDef>> {
    let text = match name {
        "grigorchuk" => GRIGORCHUK,
        "gupta_sidki3" | "gupta-sidki3" | "gupta_sidki" => GUPTA_SIDKI3,
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    GroupDef::parse_text(text)
}
