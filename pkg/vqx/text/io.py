from rustshed import Result, Ok, Err, result_shortcut

from vqx.sys.fs import or_ext, StrPath


def load_txt(file: StrPath) -> Result[str, str]:
    """加载文本"""
    try:
        with open(file, "r", encoding="utf-8") as f:
            return Ok(f.read())
    except OSError as e:
        return Err(f"读取失败: {file}, {e}")


def save_txt(txt: str, file: StrPath, ext: str = ".txt") -> Result[bool, str]:
    """保存文本到文件"""
    file = or_ext(file, ext)
    try:
        file.parent.mkdir(parents=True, exist_ok=True)
        with open(file, "w", encoding="utf-8") as f:
            f.write(txt)
    except OSError as e:
        return Err(f"写入失败: {file}, {e}")
    return Ok(True)


def save_lines(
    lines: list[str], file: StrPath, ext: str = "", postfix: str = "\n"
) -> Result[bool, str]:
    """多行文本保存到文件，文件自动加扩展名，自动建立目录，行尾自动加回车"""
    return save_txt("".join(line + postfix for line in lines), file, ext)


@result_shortcut
def load_lines(file: StrPath) -> Result[list[str], str]:
    """加载多行文本, 去掉空行和注释行"""
    lines = [s.strip() for s in load_txt(file).Q.splitlines()]
    return Ok([s for s in lines if s and not s.startswith("#")])
